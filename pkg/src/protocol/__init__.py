# Protocol module – party state machines for the reconciliation protocols.
