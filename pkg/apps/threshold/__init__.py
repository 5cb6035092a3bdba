# Threshold resolvent analyzer for discrete Schrodinger operators on graphs with rays
