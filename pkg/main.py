#!/usr/bin/env python3
import sys

sys.path.append("src")

from wickcalc.cli import cli  # noqa: E402


def main() -> None:
    cli()


if __name__ == "__main__":
    main()
