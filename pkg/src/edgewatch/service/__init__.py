"""Dual-backend service facade: REST + WebSocket + persistence + CLI."""
