import sys

from gldpc.main import main

sys.exit(main())
