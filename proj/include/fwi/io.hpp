#ifndef FWI_IO_HPP
#define FWI_IO_HPP

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "fwi/field.hpp"
#include "fwi/wave.hpp"

namespace fwi {

/// Binary field container: magic "FWIF", version u8, dimensionality u8,
/// per-axis node counts (u64 LE), per-axis spacing (f64 LE), payload of
/// f64 LE values in row-major order with the last axis fastest. Round-trips
/// bit-exactly.
void write_field(std::ostream& os, const ScalarField& field);
ScalarField read_field(std::istream& is, int ghost_layers = 2);
void write_field_file(const std::string& path, const ScalarField& field);
ScalarField read_field_file(const std::string& path, int ghost_layers = 2);

/// Text trace table: one header line (time, then sensor ids), one row per
/// step, comma-separated values at 17 significant digits so doubles
/// round-trip bit-exactly.
void write_record(std::ostream& os, const ShotRecord& record);
void write_record_file(const std::string& path, const ShotRecord& record);

/// Parsed trace table; positions are not stored in the file, so attaching a
/// sensor array happens separately.
struct RecordData {
    std::vector<double> times;
    std::size_t n_sensors = 0;
    std::vector<double> samples;   // sensor-major, like ShotRecord
};
RecordData read_record(std::istream& is);
RecordData read_record_file(const std::string& path);
ShotRecord to_shot_record(const RecordData& data, const SensorArray& sensors);

/// Checkpoint container in the FieldFile style: magic "FWIC", version u8,
/// u32 block count, then named f64 blocks (u16 name length, name bytes,
/// u64 count, values f64 LE).
struct NamedBlocks {
    std::vector<std::pair<std::string, std::vector<double>>> blocks;

    void add(const std::string& name, std::vector<double> values);
    const std::vector<double>& get(const std::string& name) const;
    bool has(const std::string& name) const;
};
void write_blocks(std::ostream& os, const NamedBlocks& blocks);
NamedBlocks read_blocks(std::istream& is);
void write_blocks_file(const std::string& path, const NamedBlocks& blocks);
NamedBlocks read_blocks_file(const std::string& path);

/// Plain-text matrix (rows along the first axis; 3d fields as blank-line
/// separated slabs) and legacy structured-grid ASCII visualization output.
void write_text_matrix(std::ostream& os, const ScalarField& field);
void write_legacy_vtk(std::ostream& os, const ScalarField& field, const std::string& name);

}  // namespace fwi

#endif
