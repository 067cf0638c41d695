# Codes module – parity-check matrices, alist I/O, puncturing and code selection.
