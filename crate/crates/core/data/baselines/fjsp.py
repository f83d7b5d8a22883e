import random

RANDOM_SEED = None
_RNG = random.Random(RANDOM_SEED)


def evaluate_candidate(job, operation, machine, start, processing_time):
    """Priority of scheduling an operation on a machine; higher is better."""
    return (-start, -processing_time)


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


def solve_fjsp(jobs, num_machines):
    next_op = [0] * len(jobs)
    job_ready = [0] * len(jobs)
    machine_ready = [0] * num_machines
    schedule = [[] for _ in jobs]
    while True:
        candidates = []
        for j, job in enumerate(jobs):
            o = next_op[j]
            if o < len(job):
                for m, p in job[o]:
                    start = max(job_ready[j], machine_ready[m])
                    candidates.append((evaluate_candidate(j, o, m, start, p), (j, m, start, p)))
        chosen = select_best(candidates)
        if chosen is None:
            break
        j, m, start, p = chosen
        schedule[j].append([m, float(start)])
        next_op[j] += 1
        job_ready[j] = start + p
        machine_ready[m] = start + p
    return schedule
