def solve_cflp(
    facility_capacities: List[int],
    customer_demands: List[int],
    assignment_costs: List[List[int]],
    fixed_costs: List[float]
) -> List[List[int]]:
    """
    Solves the Capacitated Facility Location Problem.

    Args:
        facility_capacities: Max capacity for each facility (Size M).
        customer_demands: Demand values for each customer (Size N).
        assignment_costs: Matrix (M x N) where [i][j] is the cost 
                          to serve customer j from facility i.
        fixed_costs: Setup cost for opening each facility.

    Returns:
        A list of assignment pairs or an allocation matrix.
    """
    pass
