# model package: signals, planes, tracks and run configuration
