import math
import random

RANDOM_SEED = None
_RNG = random.Random(RANDOM_SEED)


def distance(a, b):
    dx = a[0] - b[0]
    dy = a[1] - b[1]
    return math.sqrt(dx * dx + dy * dy)


def evaluate_candidate(current, customer, coordinates, load, demands, vehicle_capacity):
    """Priority of visiting a customer next; higher is better."""
    return -distance(coordinates[current], coordinates[customer])


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


def solve_cvrp(coordinates, demands, vehicle_capacity):
    n = len(demands) - 1
    served = [False] * (n + 1)
    routes = []
    route = []
    current, load, left = 0, 0, n
    while left > 0:
        candidates = [
            (evaluate_candidate(current, j, coordinates, load, demands, vehicle_capacity), j)
            for j in range(1, n + 1)
            if not served[j] and load + demands[j] <= vehicle_capacity
        ]
        j = select_best(candidates)
        if j is None:
            routes.append(route)
            route = []
            current, load = 0, 0
            continue
        served[j] = True
        left -= 1
        load += demands[j]
        route.append(j)
        current = j
    if route:
        routes.append(route)
    flat = [0]
    for r in routes:
        flat.extend(r)
        flat.append(0)
    return flat
