import sys

from tensorlab.main import main

sys.exit(main())
