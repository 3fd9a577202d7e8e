#!/usr/bin/env python3
"""
Main entry point for the composite index engine.
Command-line interface for scoring, ranking and checking composite indices.
"""
import sys
import os

# Add src directory to Python path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), 'src'))

from run_index import main

if __name__ == "__main__":
    sys.exit(main())
