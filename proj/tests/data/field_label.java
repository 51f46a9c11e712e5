public static String createLabelWithNameSpace( final String namespace, final String fieldName, final ResourceBundle bundle ) {
      String label;
      try { label = bundle.getString( namespace + '.' + fieldName );
      } catch ( MissingResourceException mre ) {
          label = generateLabelValue( fieldName ); }
      return label;
}
