import sys

from src.cli.app import run
from src.utils.logging_utils import get_logger

logger = get_logger(__name__)


def main():
    """Main entry point for the command line"""
    try:
        sys.exit(run(sys.argv[1:]))
    except KeyboardInterrupt:
        logger.logjson("WARNING", "Interrupted")
        sys.exit(2)


if __name__ == "__main__":
    main()
