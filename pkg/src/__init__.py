# LDPC key reconciliation toolkit
