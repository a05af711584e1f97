import numpy as np

from errors import GridError


def add_grid_arguments(parser, default_points=200):
    group = parser.add_argument_group('grid')
    group.add_argument('--start', type=float, default=0.0, help='first grid point')
    group.add_argument('--stop', type=float, default=None, help='last grid point')
    group.add_argument('--points', type=int, default=default_points, help='number of grid points')


def build_grid(start, stop, points):
    if points < 1:
        raise GridError(f"need at least one grid point, got {points}")
    if points > 1 and not stop > start:
        raise GridError(f"grid stop {stop} must exceed start {start}")
    return np.linspace(start, stop, points)
