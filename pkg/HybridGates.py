#!/usr/bin/env python3
from dfs_gates.cli import main

if __name__ == "__main__":
    main()
