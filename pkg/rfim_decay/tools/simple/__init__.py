"""Simple tools: one engine call per request."""
