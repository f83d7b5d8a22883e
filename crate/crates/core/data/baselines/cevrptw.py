import random

RANDOM_SEED = None
_RNG = random.Random(RANDOM_SEED)
EPS = 1e-9


def evaluate_candidate(current, customer, detour, travel):
    """Priority of extending the route to a customer; higher is better."""
    return -travel


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


def arrive(cur, t, b, nxt, distance_matrix, time_windows, service_times, battery_capacity, stations):
    """Departure time and battery after moving to nxt, or None."""
    d = distance_matrix[cur][nxt]
    if d > b + EPS:
        return None
    e, l = time_windows[nxt]
    start = max(t + d, e)
    if start > l + EPS:
        return None
    battery = battery_capacity if nxt in stations else b - d
    return (start + service_times[nxt], battery)


def way_home(cur, t, b, distance_matrix, time_windows, service_times, battery_capacity, stations, station_indices):
    """Path back to the depot, directly or via one station, or None."""
    args = (distance_matrix, time_windows, service_times, battery_capacity, stations)
    if arrive(cur, t, b, 0, *args) is not None:
        return []
    best, best_cost = None, None
    for s in station_indices:
        at_s = arrive(cur, t, b, s, *args)
        if at_s is not None and arrive(s, at_s[0], at_s[1], 0, *args) is not None:
            cost = distance_matrix[cur][s] + distance_matrix[s][0]
            if best is None or cost < best_cost:
                best, best_cost = s, cost
    return None if best is None else [best]


def solve_cevrptw(distance_matrix, demands, time_windows, service_times, vehicle_capacity, battery_capacity, station_indices):
    stations = set(station_indices)
    args = (distance_matrix, time_windows, service_times, battery_capacity, stations)
    d = distance_matrix
    n = len(demands) - 1 - len(station_indices)
    served = [False] * (n + 1)
    left = n
    flat = [0]
    route = []
    cur, t, b, load = 0, 0.0, battery_capacity, 0
    while left > 0:
        candidates = []
        for c in range(1, n + 1):
            if served[c] or load + demands[c] > vehicle_capacity:
                continue
            best = None
            at_c = arrive(cur, t, b, c, *args)
            if at_c is not None and way_home(c, at_c[0], at_c[1], *args, station_indices) is not None:
                best = (d[cur][c], [c], at_c)
            for s in station_indices:
                at_s = arrive(cur, t, b, s, *args)
                if at_s is None:
                    continue
                at_c = arrive(s, at_s[0], at_s[1], c, *args)
                if at_c is None:
                    continue
                cost = d[cur][s] + d[s][c]
                if way_home(c, at_c[0], at_c[1], *args, station_indices) is not None and (best is None or cost < best[0]):
                    best = (cost, [s, c], at_c)
            if best is not None:
                candidates.append((evaluate_candidate(cur, c, best[0] - d[cur][c], best[0]), (c, best[1], best[2])))
        chosen = select_best(candidates)
        if chosen is None:
            if not route:
                raise RuntimeError("no customer reachable from the depot")
            route.extend(way_home(cur, t, b, *args, station_indices))
            flat.extend(route)
            flat.append(0)
            route = []
            cur, t, b, load = 0, 0.0, battery_capacity, 0
            continue
        c, path, (tc, bc) = chosen
        route.extend(path)
        served[c] = True
        left -= 1
        load += demands[c]
        cur, t, b = c, tc, bc
    if route:
        route.extend(way_home(cur, t, b, *args, station_indices))
        flat.extend(route)
        flat.append(0)
    return flat
