# Utils module – configuration and the exception hierarchy.
