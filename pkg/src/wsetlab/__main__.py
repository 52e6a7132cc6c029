import sys

from wsetlab.cli import main

sys.exit(main())
