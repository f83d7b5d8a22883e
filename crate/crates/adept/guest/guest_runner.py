"""Single-shot guest worker: one request on stdin, one response on stdout."""
import io
import json
import signal
import sys
import time
import traceback

ARGUMENTS = {
    "cflp": ["facility_capacities", "customer_demands", "assignment_costs", "fixed_costs"],
    "cvrp": ["coordinates", "demands", "vehicle_capacity"],
    "fjsp": ["jobs", "num_machines"],
    "mis": ["num_vertices", "edges"],
    "cevrptw": ["distance_matrix", "demands", "time_windows", "service_times",
                "vehicle_capacity", "battery_capacity", "station_indices"],
    "mrcpsp": ["modes", "successors", "renewable_capacities", "nonrenewable_capacities"],
}
TAIL = 2048


class GuestTimeout(BaseException):
    pass


def _alarm(signum, frame):
    raise GuestTimeout()


def plain(value):
    """Converts numpy containers and scalars to JSON-ready values."""
    if hasattr(value, "tolist"):
        return value.tolist()
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    if isinstance(value, dict):
        return {str(k): plain(v) for k, v in value.items()}
    if hasattr(value, "item"):
        return value.item()
    return value


def main():
    real_stdout = sys.stdout
    try:
        request = json.loads(sys.stdin.read())
        source = request["source"]
        entry = request["entry"]
        problem = request["problem"]
        payload = request["instance"]["payload"]
        limit = float(request.get("time_limit_s", 10.0))
    except Exception as exc:
        sys.stderr.write("unreadable request: %r\n" % exc)
        return 1

    captured = io.StringIO()
    sys.stdout = captured
    status, solution = "error", None
    started = time.monotonic()
    signal.signal(signal.SIGALRM, _alarm)
    signal.setitimer(signal.ITIMER_REAL, max(limit, 0.001))
    try:
        namespace = {"__name__": "guest"}
        exec(compile(source, "<guest>", "exec"), namespace)
        fn = namespace[entry]
        args = [payload[name] for name in ARGUMENTS[problem]]
        solution = plain(fn(*args))
        status = "ok"
    except GuestTimeout:
        status = "timeout"
    except BaseException:
        captured.write(traceback.format_exc())
    finally:
        signal.setitimer(signal.ITIMER_REAL, 0)
        sys.stdout = real_stdout
    response = {
        "status": status,
        "solution": solution if status == "ok" else None,
        "stderr_tail": captured.getvalue()[-TAIL:],
        "wall_time_s": time.monotonic() - started,
    }
    try:
        text = json.dumps(response, allow_nan=False)
    except (TypeError, ValueError) as exc:
        response.update(status="error", solution=None, stderr_tail=("unserialisable solution: %r" % exc)[-TAIL:])
        text = json.dumps(response, allow_nan=False)
    real_stdout.write(text)
    real_stdout.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())
