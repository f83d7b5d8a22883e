import random

RANDOM_SEED = None
_RNG = random.Random(RANDOM_SEED)


def evaluate_candidate(facility, customer, demand, is_open, facility_capacities, assignment_costs, fixed_costs):
    """Priority of serving a customer from a facility; higher is better."""
    cost = float(assignment_costs[facility][customer])
    if not is_open:
        cost += fixed_costs[facility] * demand / facility_capacities[facility]
    return -cost


def select_best(candidates):
    """Returns the item of the highest-priority (priority, item) pair."""
    if not candidates:
        return None
    if RANDOM_SEED is not None:
        return _RNG.choice(candidates)[1]
    best = candidates[0]
    for cand in candidates[1:]:
        if cand[0] > best[0]:
            best = cand
    return best[1]


def solve_cflp(facility_capacities, customer_demands, assignment_costs, fixed_costs):
    m = len(facility_capacities)
    n = len(customer_demands)
    order = sorted(range(n), key=lambda c: (-customer_demands[c], c))
    remaining = list(facility_capacities)
    is_open = [False] * m
    pairs = []
    for c in order:
        d = customer_demands[c]
        candidates = [
            (evaluate_candidate(f, c, d, is_open[f], facility_capacities, assignment_costs, fixed_costs), f)
            for f in range(m)
            if remaining[f] >= d
        ]
        f = select_best(candidates)
        if f is None:
            raise RuntimeError("no facility can take customer %d" % c)
        remaining[f] -= d
        is_open[f] = True
        pairs.append([f, c])
    return pairs
