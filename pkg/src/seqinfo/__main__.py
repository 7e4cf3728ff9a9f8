"""Entry point for `python -m seqinfo`."""

from .cli import main

if __name__ == "__main__":
    raise SystemExit(main())
