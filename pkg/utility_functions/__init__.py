# utility_functions/__init__.py

from .plotting import plot_trace
from .cayley_graph import cayley_ball, sphere_counts, graph_distance, graph_gromov_product

__all__ = ['plot_trace', 'cayley_ball', 'sphere_counts', 'graph_distance', 'graph_gromov_product']
