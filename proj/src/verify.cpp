#include "nczw/verify.hpp"
