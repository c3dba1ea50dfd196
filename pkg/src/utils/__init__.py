# utils package: configuration, CSV files and plots
