"""
Candidate search, inequality checks, experiments and manifests.
"""
