#pragma once

#include "qir_sentinel/ast.hpp"
#include "qir_sentinel/config.hpp"
#include "qir_sentinel/diagnostic.hpp"
#include "qir_sentinel/ledger.hpp"
#include "qir_sentinel/lexer.hpp"
#include "qir_sentinel/parser.hpp"
#include "qir_sentinel/printer.hpp"
#include "qir_sentinel/report.hpp"
#include "qir_sentinel/semantics.hpp"
#include "qir_sentinel/validate.hpp"
