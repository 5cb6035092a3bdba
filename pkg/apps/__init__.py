"""Applications package for the threshold resolvent analyzer."""
