from tfnorm.cli import main
import sys

sys.exit(main())
