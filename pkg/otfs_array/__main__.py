"""Allow `python -m otfs_array`."""
import sys

from .cli import main

sys.exit(main())
