import logging
import sys

from Pipeline.glidecast_cli import dispatch


def main():
    # Progress to stderr, artifacts to the --out paths
    logging.basicConfig(level=logging.INFO, stream=sys.stderr, format="%(levelname)s:%(message)s")
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == '__main__':
    main()
