"""Allow running netflow as a module: python -m netflow"""
from netflow.cli import main

main()
