import os
import sys

project_root = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, project_root)

from cli.app import cli


def main():
    """Application entry point
    """
    cli(prog_name="coinlens")


if __name__ == "__main__":
    main()
