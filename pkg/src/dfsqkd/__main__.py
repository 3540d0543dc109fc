import sys

from dfsqkd.cli import main

sys.exit(main())
