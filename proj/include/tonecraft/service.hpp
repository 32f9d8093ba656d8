#ifndef TONECRAFT_SERVICE_HPP
#define TONECRAFT_SERVICE_HPP

#include "tonecraft/service/api.hpp"
#include "tonecraft/service/server.hpp"

#endif  // TONECRAFT_SERVICE_HPP
