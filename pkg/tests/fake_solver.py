#!/usr/bin/env python3
"""Scriptable stand-in for an external SMT solver, used to exercise the
subprocess protocol: canned verdicts, models, garbage, delays, crashes."""

import sys
import time


def main() -> int:
    mode = sys.argv[1] if len(sys.argv) > 1 else "unsat"
    sys.stdin.read()
    if mode == "unsat":
        print("unsat")
    elif mode == "unknown":
        print("unknown")
    elif mode == "sat-u8-255":
        print("sat")
        print("((|nd::x| #xff))")
    elif mode == "sat-missing-model":
        print("sat")
    elif mode == "garbage":
        print("flagrant solver nonsense")
    elif mode == "crash":
        print("boom", file=sys.stderr)
        return 3
    elif mode == "sleep":
        seconds = float(sys.argv[2]) if len(sys.argv) > 2 else 30.0
        time.sleep(seconds)
        print("unsat")
    return 0


if __name__ == "__main__":
    sys.exit(main())
