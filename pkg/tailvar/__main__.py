import sys

from tailvar.main import main

sys.exit(main())
