"""L-functions of elliptic curves over F_q(t) and the prime races they govern."""
