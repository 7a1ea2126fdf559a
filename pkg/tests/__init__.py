# Test files 