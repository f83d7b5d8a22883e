import random

RANDOM_SEED = None
_RNG = random.Random(RANDOM_SEED)


def evaluate_candidate(vertex, residual_degree):
    """Priority of adding a vertex; higher is better."""
    return -residual_degree


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


def solve_mis(num_vertices, edges):
    adj = [[] for _ in range(num_vertices)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    alive = [True] * num_vertices
    degree = [len(a) for a in adj]
    chosen = []
    while True:
        candidates = [(evaluate_candidate(v, degree[v]), v) for v in range(num_vertices) if alive[v]]
        v = select_best(candidates)
        if v is None:
            break
        chosen.append(v)
        removed = [v] + [u for u in adj[v] if alive[u]]
        for u in removed:
            alive[u] = False
        for u in removed:
            for w in adj[u]:
                if alive[w]:
                    degree[w] -= 1
    return chosen
