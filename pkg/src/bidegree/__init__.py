"""Differentially private bi-degree release, L1 denoising and p0-model inference."""
