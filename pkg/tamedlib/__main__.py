"""Allow `python -m tamedlib`."""

from tamedlib.cli.main import main

if __name__ == "__main__":
    raise SystemExit(main())
