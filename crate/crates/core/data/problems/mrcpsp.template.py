def solve_mrcpsp(
    modes: List[List[Dict]],
    successors: List[List[int]],
    renewable_capacities: List[int],
    nonrenewable_capacities: List[int]
) -> List[List[int]]:
    """
    Solves the Multi-Mode Resource-Constrained Project Scheduling Problem.

    Args:
        modes: modes[j] lists the execution modes of activity j; each mode is
               {"duration": int, "renewable": [int], "nonrenewable": [int]}.
               Activity 0 is the dummy source, the last activity the dummy sink.
        successors: successors[j] lists the activities that may start only
                    after activity j finishes.
        renewable_capacities: Per-period capacity of each renewable resource.
        nonrenewable_capacities: Total capacity of each non-renewable resource.

    Returns:
        For each activity, the pair [mode_index, finish_time].
    """
    pass
