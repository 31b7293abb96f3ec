# utility_functions/cayley_graph.py

import networkx as nx


def cayley_ball(model, radius):
    """
    The ball of the given radius in the Cayley graph of the model, built by breadth-first
    growth from the identity.

    Parameters:
    model : GroupModel
        The group whose generating letters label the edges.
    radius : int
        Largest word length kept.

    Returns:
    networkx.Graph
        Nodes are normal-form words (tuples); edges join g and g*s for every letter s.
    """
    graph = nx.Graph()
    graph.add_node(())
    frontier = [()]
    for _ in range(radius):
        grown = []
        for word in frontier:
            for letter in range(model.num_letters):
                neighbor = model.reduce(word + (letter,))
                if len(neighbor) > radius:
                    continue
                if neighbor not in graph:
                    grown.append(neighbor)
                graph.add_edge(word, neighbor)
        frontier = grown
    return graph


def sphere_counts(graph, root=()):
    """
    Number of vertices at each graph distance from root.

    Returns:
    dict
        {distance: count}
    """
    counts = {}
    for _, d in nx.single_source_shortest_path_length(graph, root).items():
        counts[d] = counts.get(d, 0) + 1
    return dict(sorted(counts.items()))


def graph_distance(graph, a, b):
    return nx.shortest_path_length(graph, tuple(a), tuple(b))


def graph_gromov_product(graph, base, y, z):
    """
    (y|z)_base from graph distances.
    """
    d = lambda u, v: graph_distance(graph, u, v)
    return (d(base, y) + d(base, z) - d(y, z)) / 2
