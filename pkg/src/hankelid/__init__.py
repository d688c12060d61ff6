"""Exact identification of linear systems from finite input-output data."""
