#pragma once

// Single include point for cpp-httplib so the TLS configuration is
// consistent across every translation unit.
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>
