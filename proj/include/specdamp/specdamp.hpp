#pragma once

// Everything: spectra, Krein sign types, sufficient conditions and
// semigroup probes for z'' + K z + C z' = 0.

#include "specdamp/conditions.hpp"
#include "specdamp/errors.hpp"
#include "specdamp/krein.hpp"
#include "specdamp/linalg.hpp"
#include "specdamp/model.hpp"
#include "specdamp/semigroup.hpp"
#include "specdamp/spectrum.hpp"
#include "specdamp/tolerance.hpp"
