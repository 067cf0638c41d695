# Decoder module – belief-propagation syndrome decoding.
