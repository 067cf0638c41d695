# Transport module – wire format, loopback/socket endpoints, synchronized PRNG.
