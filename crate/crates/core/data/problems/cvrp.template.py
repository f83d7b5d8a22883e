def solve_cvrp(
    coordinates: List[List[float]],
    demands: List[int],
    vehicle_capacity: int
) -> List[int]:
    """
    Solves the Capacitated Vehicle Routing Problem.

    Args:
        coordinates: (N x 2) positions; node 0 is the depot.
        demands: (N) Demand of each node (0 for the depot).
        vehicle_capacity: Max load per vehicle.

    Returns:
        Flattened list of routes (e.g., [0, 3, 1, 0, 0, 2, 0])
        or a list of routes, one list of customer indices per vehicle.
    """
    pass
