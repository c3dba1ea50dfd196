# service package: transforms, estimation, separability and recovery
