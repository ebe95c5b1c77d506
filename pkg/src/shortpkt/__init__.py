"""Short-packet OFDM link simulator with interleaving and impulse interference."""
