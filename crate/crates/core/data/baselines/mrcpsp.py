import random

RANDOM_SEED = None
_RNG = random.Random(RANDOM_SEED)


def evaluate_candidate(activity, start, duration):
    """Priority of scheduling an activity next; higher is better."""
    return -start


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


def choose_modes(modes, nonrenewable_capacities):
    """Cheapest mode per activity that keeps the remaining budget satisfiable."""
    n = len(modes)
    k0, k1 = nonrenewable_capacities[0], nonrenewable_capacities[1]
    inf = float("inf")
    tail = [[inf] * (k0 + 1) for _ in range(n + 1)]
    tail[n] = [0] * (k0 + 1)
    for j in range(n - 1, -1, -1):
        row = [inf] * (k0 + 1)
        for a in range(k0 + 1):
            for md in modes[j]:
                u0 = md["nonrenewable"][0]
                if u0 <= a and tail[j + 1][a - u0] != inf:
                    row[a] = min(row[a], tail[j + 1][a - u0] + md["nonrenewable"][1])
        tail[j] = row
    used0, used1 = 0, 0
    chosen = []
    for j in range(n):
        best, best_cost = None, None
        for mi, md in enumerate(modes[j]):
            a = used0 + md["nonrenewable"][0]
            b = used1 + md["nonrenewable"][1]
            if a <= k0 and b <= k1 and tail[j + 1][k0 - a] <= k1 - b:
                cost = md["nonrenewable"][0] / max(k0, 1) + md["nonrenewable"][1] / max(k1, 1)
                if best is None or cost < best_cost:
                    best, best_cost = mi, cost
        if best is None:
            raise RuntimeError("no mode fits the budget for activity %d" % j)
        used0 += modes[j][best]["nonrenewable"][0]
        used1 += modes[j][best]["nonrenewable"][1]
        chosen.append(best)
    return chosen


def solve_mrcpsp(modes, successors, renewable_capacities, nonrenewable_capacities):
    n = len(modes)
    chosen = choose_modes(modes, nonrenewable_capacities)
    preds = [[] for _ in range(n)]
    for i, succ in enumerate(successors):
        for j in succ:
            preds[j].append(i)
    horizon = sum(modes[j][chosen[j]]["duration"] for j in range(n)) + 1
    nr = len(renewable_capacities)
    profile = [[0] * nr for _ in range(horizon)]
    finish = [None] * n
    for _ in range(n):
        candidates = []
        for j in range(n):
            if finish[j] is not None or any(finish[p] is None for p in preds[j]):
                continue
            md = modes[j][chosen[j]]
            t = max([finish[p] for p in preds[j]], default=0)
            d = md["duration"]
            while True:
                clash = None
                for tau in range(t, t + d):
                    for r in range(nr):
                        if profile[tau][r] + md["renewable"][r] > renewable_capacities[r]:
                            clash = tau
                            break
                    if clash is not None:
                        break
                if clash is None:
                    break
                t = clash + 1
            candidates.append((evaluate_candidate(j, t, d), (j, t)))
        j, t = select_best(candidates)
        md = modes[j][chosen[j]]
        for tau in range(t, t + md["duration"]):
            for r in range(nr):
                profile[tau][r] += md["renewable"][r]
        finish[j] = t + md["duration"]
    return [[chosen[j], finish[j]] for j in range(n)]
