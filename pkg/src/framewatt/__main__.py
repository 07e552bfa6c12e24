"""Allow ``python -m framewatt`` to invoke the command-line interface."""

from framewatt.cli import main

if __name__ == "__main__":
    raise SystemExit(main())
