def solve_mis(
    num_vertices: int,
    edges: List[List[int]]
) -> List[int]:
    """
    Solves the Maximum Independent Set Problem.

    Args:
        num_vertices: Number of vertices, labelled 0..num_vertices-1.
        edges: Undirected edges as [u, v] pairs.

    Returns:
        The vertices of an independent set.
    """
    pass
