"""Mean cluster size of directed compact percolation near a damp wall."""

