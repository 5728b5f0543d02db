#pragma once

#include "rtlpsc/aes.hpp"
#include "rtlpsc/assessment.hpp"
#include "rtlpsc/bits.hpp"
#include "rtlpsc/composite_sbox.hpp"
#include "rtlpsc/digest.hpp"
#include "rtlpsc/error.hpp"
#include "rtlpsc/metrics.hpp"
#include "rtlpsc/parallel.hpp"
#include "rtlpsc/profile.hpp"
#include "rtlpsc/report.hpp"
#include "rtlpsc/rtl_model.hpp"
#include "rtlpsc/saif.hpp"
#include "rtlpsc/stimulus.hpp"
