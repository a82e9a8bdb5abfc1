import functools

import pytest

from cellkit import create_system
from cellkit.cells import compute_cells
from cellkit.hecke import KLTable


@functools.lru_cache(maxsize=None)
def _system(cartan_type, rank):
    return create_system(cartan_type, rank)


@functools.lru_cache(maxsize=None)
def _table(cartan_type, rank):
    return KLTable(_system(cartan_type, rank))


@functools.lru_cache(maxsize=None)
def _dec(cartan_type, rank):
    return compute_cells(_table(cartan_type, rank))


@pytest.fixture(scope="session")
def sys_factory():
    """Session-cached CoxeterSystem factory: sys_factory("B", 3)."""
    return _system


@pytest.fixture(scope="session")
def table_factory():
    """Session-cached KLTable factory sharing sys_factory's systems."""
    return _table


@pytest.fixture(scope="session")
def dec_factory():
    """Session-cached CellDecomposition factory on shared tables."""
    return _dec
