"""Test suites.

For continuous testing while editing, install `entr` and run:

$ ack --type=python tamedlib tests -f | entr -r poetry run pytest -m "not slow" tests

"""
