#pragma once

namespace gngwt {

/// Configures the library logger from GNGWT_LOG (error | info | debug; default info).
void configure_logging_from_env();

}  // namespace gngwt
