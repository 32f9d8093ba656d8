#ifndef TONECRAFT_ANALYTICS_HPP
#define TONECRAFT_ANALYTICS_HPP

#include "tonecraft/analytics/distributions.hpp"
#include "tonecraft/analytics/group_tests.hpp"
#include "tonecraft/analytics/keywords.hpp"
#include "tonecraft/analytics/ols.hpp"
#include "tonecraft/analytics/pca.hpp"
#include "tonecraft/analytics/ratings.hpp"
#include "tonecraft/analytics/report.hpp"
#include "tonecraft/analytics/tone_delta.hpp"

#endif  // TONECRAFT_ANALYTICS_HPP
