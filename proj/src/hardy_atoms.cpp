#include "nczw/hardy_atoms.hpp"
