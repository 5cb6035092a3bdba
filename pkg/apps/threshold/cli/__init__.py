# Command line, run configuration and reports
