#ifndef TONECRAFT_HARNESS_HPP
#define TONECRAFT_HARNESS_HPP

#include "tonecraft/harness/experiment.hpp"
#include "tonecraft/harness/synthetic.hpp"

#endif  // TONECRAFT_HARNESS_HPP
