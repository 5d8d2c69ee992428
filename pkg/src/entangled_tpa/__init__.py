"""Two-photon absorption of entangled photon pairs around sub-wavelength fibers."""
