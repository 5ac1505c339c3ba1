import sys

from nagi.cli import main

sys.exit(main())
