#!/usr/bin/env python3
"""
asymvol command-line launcher
"""

import os
import sys

# Add repository root to path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from asymvol.cli import run

def main():
    sys.exit(run(sys.argv[1:]))

if __name__ == '__main__':
    main()
