def solve_fjsp(
    jobs: List[List[List[List[int]]]],
    num_machines: int
) -> List[List[List[float]]]:
    """
    Solves the Flexible Job Shop Scheduling Problem.

    Args:
        jobs: jobs[j][o] lists the eligible [machine, processing_time]
              pairs of operation o of job j. Operations of a job run in order.
        num_machines: Number of machines.

    Returns:
        For each job, for each operation, the pair [machine, start_time].
    """
    pass
