#ifndef TONECRAFT_NEURAL_HPP
#define TONECRAFT_NEURAL_HPP

#include "tonecraft/neural/adam.hpp"
#include "tonecraft/neural/checkpoint.hpp"
#include "tonecraft/neural/lstm.hpp"
#include "tonecraft/neural/model.hpp"
#include "tonecraft/neural/params.hpp"
#include "tonecraft/neural/train.hpp"

#endif  // TONECRAFT_NEURAL_HPP
