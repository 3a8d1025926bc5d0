import sys

from bdarch.cli import main

sys.exit(main())
