#include "verify.hpp"
