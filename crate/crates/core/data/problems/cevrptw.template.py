def solve_cevrptw(
    distance_matrix: np.ndarray,
    demands: np.array,
    time_windows: np.ndarray,
    service_times: np.ndarray,
    vehicle_capacity: int,
    battery_capacity: float,
    station_indices: List[int]
) -> List[int]:
    """
    Solves the Capacitated Electric VRP with Time Windows.

    Args:
        distance_matrix: (N x N) distance between all nodes.
        demands: (N) Demand of nodes (0 for depot/stations).
        time_windows: (N x 2) [Earliest, Latest] arrival times.
        service_times: (N) Duration required at each node.
        vehicle_capacity: Max load per vehicle.
        battery_capacity: Max battery energy units.
        station_indices: Indices of nodes that are charging stations.

    Returns:
        Flattened list of routes (e.g., [0, 1, 5, 0, 0, 2, 0]).
        Must start/end with Depot (0).
    """
    pass
