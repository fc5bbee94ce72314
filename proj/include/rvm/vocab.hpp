#pragma once

#include <string>
#include <string_view>

// Vocabulary IRIs. The rvm namespace holds the machine and instruction
// vocabulary; data/rvm-vocab.nq lists every predicate defined here.
namespace rvm::vocab {

inline constexpr std::string_view kRdf = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
inline constexpr std::string_view kRdfs = "http://www.w3.org/2000/01/rdf-schema#";
inline constexpr std::string_view kXsd = "http://www.w3.org/2001/XMLSchema#";
inline constexpr std::string_view kOwl = "http://www.w3.org/2002/07/owl#";
inline constexpr std::string_view kRvm = "http://example.com/rvm#";

inline std::string rdf(std::string_view local) { return std::string(kRdf) + std::string(local); }
inline std::string rdfs(std::string_view local) { return std::string(kRdfs) + std::string(local); }
inline std::string xsd(std::string_view local) { return std::string(kXsd) + std::string(local); }
inline std::string owl(std::string_view local) { return std::string(kOwl) + std::string(local); }
inline std::string rvm(std::string_view local) { return std::string(kRvm) + std::string(local); }

// Frequently used terms, spelled out.
inline const std::string kType = rdf("type");
inline const std::string kFirst = rdf("first");
inline const std::string kRest = rdf("rest");
inline const std::string kNil = rdf("nil");
inline const std::string kLangString = rdf("langString");
inline const std::string kSubClassOf = rdfs("subClassOf");
inline const std::string kRange = rdfs("range");
inline const std::string kXsdString = xsd("string");
inline const std::string kXsdInt = xsd("int");
inline const std::string kXsdInteger = xsd("integer");
inline const std::string kXsdDouble = xsd("double");
inline const std::string kXsdBoolean = xsd("boolean");
inline const std::string kXsdNonNegInt = xsd("nonNegativeInteger");
inline const std::string kOwlClass = owl("Class");
inline const std::string kMinCard = owl("minCardinality");
inline const std::string kMaxCard = owl("maxCardinality");

inline const std::string kDefaultGraph = rvm("default");
inline const std::string kMemoGraph = rvm("memo");
inline const std::string kApiGraph = rvm("api");

// Instruction vocabulary.
inline const std::string kNextInst = rvm("nextInst");
inline const std::string kValue = rvm("value");
inline const std::string kSymbol = rvm("symbol");
inline const std::string kPredicate = rvm("predicate");
inline const std::string kInvokeMethod = rvm("invokeMethod");
inline const std::string kBranchTrue = rvm("branchTrue");
inline const std::string kBranchFalse = rvm("branchFalse");
inline const std::string kFromBlock = rvm("fromBlock");

// API and object vocabulary.
inline const std::string kMethod = rvm("Method");
inline const std::string kHasMethod = rvm("hasMethod");
inline const std::string kHasField = rvm("hasField");
inline const std::string kFirstInst = rvm("firstInst");
inline const std::string kParam = rvm("param");
inline const std::string kParamIndex = rvm("paramIndex");
inline const std::string kParamName = rvm("paramName");
inline const std::string kParamType = rvm("paramType");
inline const std::string kMethodName = rvm("methodName");
inline const std::string kReturnType = rvm("returnType");
inline const std::string kTemplate = rvm("template");
inline const std::string kOwner = rvm("owner");
inline const std::string kSpawnedBy = rvm("spawnedBy");

// Machine state vocabulary.
inline const std::string kRVM = rvm("RVM");
inline const std::string kFrame = rvm("Frame");
inline const std::string kBinding = rvm("Binding");
inline const std::string kValueSet = rvm("ValueSet");
inline const std::string kProgramLocation = rvm("programLocation");
inline const std::string kOperandStack = rvm("operandStack");
inline const std::string kReturnStack = rvm("returnStack");
inline const std::string kFrameStack = rvm("frameStack");
inline const std::string kHasBinding = rvm("hasBinding");
inline const std::string kHasSymbol = rvm("hasSymbol");
inline const std::string kHasValue = rvm("hasValue");
inline const std::string kBindingIndex = rvm("bindingIndex");
inline const std::string kReturnsValue = rvm("returnsValue");
inline const std::string kMember = rvm("member");
inline const std::string kNeedsProcess = rvm("needsProcess");
inline const std::string kCyclesRemaining = rvm("cyclesRemaining");
inline const std::string kFault = rvm("fault");
inline const std::string kFaultMessage = rvm("faultMessage");
inline const std::string kHalt = rvm("halt");

// Memo vocabulary.
inline const std::string kFunction = rvm("function");
inline const std::string kInput = rvm("input");
inline const std::string kOutput = rvm("output");

}  // namespace rvm::vocab
