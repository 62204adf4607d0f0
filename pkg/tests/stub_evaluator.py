"""Loopback evaluator for tests.

usage: stub_evaluator.py MODE [ARG] [--log PATH]

  table PATH    answer request k with line k of PATH (one float per line)
  const VALUE   always answer VALUE
  missing       answer without a feedback key
  garbage       answer with a non-JSON line
  nan           answer with a non-finite feedback
  exit          exit before answering
  hang          read requests but never answer
"""

import json
import sys
import time


def main(argv):
    log_path = None
    if "--log" in argv:
        i = argv.index("--log")
        log_path = argv[i + 1]
        argv = argv[:i] + argv[i + 2 :]
    mode = argv[1]
    table = []
    if mode == "table":
        with open(argv[2]) as fh:
            table = [float(line) for line in fh if line.strip()]
    log = open(log_path, "w") if log_path else None

    k = 0
    for line in sys.stdin:
        if log:
            log.write(line)
            log.flush()
        req = json.loads(line)
        if mode == "table":
            reply = {"feedback": table[k]}
        elif mode == "const":
            reply = {"feedback": float(argv[2])}
        elif mode == "missing":
            reply = {"value": 1.0, "arm": req["arm"]}
        elif mode == "garbage":
            sys.stdout.write("not json\n")
            sys.stdout.flush()
            k += 1
            continue
        elif mode == "nan":
            sys.stdout.write('{"feedback": NaN}\n')
            sys.stdout.flush()
            k += 1
            continue
        elif mode == "exit":
            return 1
        elif mode == "hang":
            time.sleep(30)
            return 0
        else:
            return 2
        sys.stdout.write(json.dumps(reply) + "\n")
        sys.stdout.flush()
        k += 1
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
