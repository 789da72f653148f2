#!/usr/bin/env python
"""
tailvar Launcher

This script runs the tailvar command-line interface from a source checkout.
"""

import os
import sys

def main():
    """Run the tailvar CLI with this script's arguments."""
    # Get the directory of this script
    script_dir = os.path.dirname(os.path.abspath(__file__))

    # Add the current directory to the Python path
    sys.path.insert(0, script_dir)

    from tailvar.main import main as cli_main
    return cli_main(sys.argv[1:])

if __name__ == "__main__":
    sys.exit(main())
