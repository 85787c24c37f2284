import sys

from svrcfa.cli import main

sys.exit(main())
